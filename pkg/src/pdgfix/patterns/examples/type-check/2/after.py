def second():
    isinstance(obj, str)
