def first():
    for key in counts:
        pass
