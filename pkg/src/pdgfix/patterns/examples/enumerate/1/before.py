def first(data):
    for i in range(len(data)):
        data[i]
