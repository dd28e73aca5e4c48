def second():
    np.log(rate + 1)
