def first():
    total = total + value
