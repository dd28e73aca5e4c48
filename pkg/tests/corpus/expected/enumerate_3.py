def scale(values, factor):
    result = []
    for k, item in enumerate(values):
        v = item * factor
        result.append(v)
    return result
