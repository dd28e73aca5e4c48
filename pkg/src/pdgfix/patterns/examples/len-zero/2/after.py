def second():
    not queue
