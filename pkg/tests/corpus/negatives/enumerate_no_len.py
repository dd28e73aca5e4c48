def f(data, n):
    for i in range(n):
        print(data[i])
