def first(data):
    for i, item in enumerate(data):
        item
