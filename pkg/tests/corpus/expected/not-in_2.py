def unseen(words, seen):
    out = []
    for w in words:
        if w not in seen:
            out.append(w)
    return out
