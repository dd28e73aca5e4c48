def first():
    result is None
