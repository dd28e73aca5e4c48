def second():
    np.log1p(rate)
