def f(x, y):
    if isinstance(x, int) or isinstance(y, float):
        return 1
