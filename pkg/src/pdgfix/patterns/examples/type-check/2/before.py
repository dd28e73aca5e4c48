def second():
    type(obj) == str
