def consume(stack):
    while True:
        if not stack:
            break
        stack.pop()
