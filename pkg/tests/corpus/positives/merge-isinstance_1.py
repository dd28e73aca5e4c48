def size(token):
    if isinstance(token, list) or isinstance(token, tuple):
        return len(token)
    return 1
