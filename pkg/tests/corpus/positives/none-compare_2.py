def drain(queue):
    node = queue.pop()
    while node == None:
        node = queue.pop()
    return node
