def dump(cols):
    print(cols)
