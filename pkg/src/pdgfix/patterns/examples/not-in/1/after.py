def first():
    key not in table
