def second(rows):
    for j, item in enumerate(rows):
        item
