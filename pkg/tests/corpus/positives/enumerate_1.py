"""Row statistics."""


def summarize(path):
    data = load_rows(path)
    header = data[0]
    total = 0
    for i in range(len(data)):
        total += data[i]
    return header, total
