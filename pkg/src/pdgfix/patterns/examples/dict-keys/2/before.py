def second():
    for word in vocab.keys():
        pass
