def second():
    value is None
