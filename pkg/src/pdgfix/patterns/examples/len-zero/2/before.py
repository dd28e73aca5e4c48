def second():
    len(queue) == 0
