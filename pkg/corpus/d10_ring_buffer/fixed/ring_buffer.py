class RingBuffer:
    def __init__(self, capacity):
        self.capacity = capacity
        self.items = []

    def push(self, item):
        self.items.append(item)
        if len(self.items) > self.capacity:
            self.items.pop(0)

    def newest(self):
        return self.items[-1]


def drain(buffer):
    drained = []
    count = len(buffer.items)
    for _ in range(count):
        drained.append(buffer.items.pop(0))
    return drained
