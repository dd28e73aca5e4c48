def second():
    isinstance(obj, (str, bytes))
