def first():
    for key in counts.keys():
        pass
