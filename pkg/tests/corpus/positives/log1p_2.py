import numpy as np


def transform(counts):
    scaled = np.log(counts + 1)
    return scaled / scaled.max()
