def first():
    not items
