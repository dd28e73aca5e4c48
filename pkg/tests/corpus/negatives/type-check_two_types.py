def f(x, y):
    if type(x) == type(y):
        return True
