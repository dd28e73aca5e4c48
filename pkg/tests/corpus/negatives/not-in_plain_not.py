def f(x, y):
    if not x:
        return y
