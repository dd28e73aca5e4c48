def second():
    for word in vocab:
        pass
