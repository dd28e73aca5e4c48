def accumulate(values):
    acc = 0
    for v in values:
        acc = acc + v
    return acc
