def is_text(item):
    return isinstance(item, (str, bytes))
