def report(items):
    total = 0
    print(items)  # show
    for x in items:
        total += x
    return total
