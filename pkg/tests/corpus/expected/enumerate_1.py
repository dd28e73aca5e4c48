"""Row statistics."""


def summarize(path):
    data = load_rows(path)
    header = data[0]
    total = 0
    for i, item in enumerate(data):
        total += item
    return header, total
