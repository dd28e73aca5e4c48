def first():
    len(items) == 0
