def second():
    isinstance(obj, str) or isinstance(obj, bytes)
