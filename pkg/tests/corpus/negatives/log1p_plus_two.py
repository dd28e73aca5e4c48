import numpy as np


def f(x):
    return np.log(x + 2)
