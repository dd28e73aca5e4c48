def first():
    isinstance(value, int) or isinstance(value, float)
