def first():
    result == None
