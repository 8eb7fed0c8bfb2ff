'''
From Z. Zhuang et al.
https://github.com/ICEORY/PMF
'''


class AverageMeter(object):
    '''Average and extremes of a stream of values; None marks an absent sample and is skipped.'''

    def __init__(self):
        self.reset()

    def reset(self):
        self.val = None
        self.avg = None
        self.sum = 0.0
        self.count = 0
        self.max = None
        self.min = None
        self.skipped = 0

    def update(self, val, n=1):
        if val is None:
            self.skipped += n
            return
        self.val = val
        self.sum += val * n
        self.count += n
        self.avg = self.sum / self.count
        self.max = val if self.max is None else max(self.max, val)
        self.min = val if self.min is None else min(self.min, val)

    def summary(self):
        return {'mean': self.avg, 'min': self.min, 'max': self.max, 'count': self.count, 'absent': self.skipped}
