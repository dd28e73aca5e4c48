def second():
    not name in seen
