def f(data):
    for i in range(len(data)):
        data[i] = 0
