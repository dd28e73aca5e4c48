def first():
    type(value) == int
