def first():
    isinstance(value, (int, float))
