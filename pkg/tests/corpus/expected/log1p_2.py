import numpy as np


def transform(counts):
    scaled = np.log1p(counts)
    return scaled / scaled.max()
