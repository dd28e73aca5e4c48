def f(x, step):
    x = x - step
    return x
