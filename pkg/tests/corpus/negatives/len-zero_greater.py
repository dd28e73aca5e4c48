def f(x):
    if len(x) > 0:
        return x[0]
