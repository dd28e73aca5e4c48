def second():
    value == None
