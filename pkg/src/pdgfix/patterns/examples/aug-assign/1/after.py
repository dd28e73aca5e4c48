def first():
    total += value
