def first():
    not key in table
