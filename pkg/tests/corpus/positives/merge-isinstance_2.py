def is_text(item):
    return isinstance(item, str) or isinstance(item, bytes)
