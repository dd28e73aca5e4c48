def normalize(arg):
    if type(arg) == dict:
        return sorted(arg.items())
    return arg
