def f(y, step):
    x = y + step
    return x
