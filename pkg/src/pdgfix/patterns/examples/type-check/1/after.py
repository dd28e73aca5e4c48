def first():
    isinstance(value, int)
