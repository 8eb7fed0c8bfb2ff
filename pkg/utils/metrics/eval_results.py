'''
Adapted from Z. Zhuang et al.
https://github.com/ICEORY/PMF
'''

from prettytable import PrettyTable

from utils.tools import AverageMeter
from .region_eval import REGIONS


class RegionRollup(object):
    '''Per-region meters over a session: mean of per-frame mean flow, depth range extremes, mask fraction.'''

    def __init__(self):
        self.flow = {r: AverageMeter() for r in REGIONS}
        self.depth_range = {r: AverageMeter() for r in REGIONS}
        self.fraction = {r: AverageMeter() for r in REGIONS}
        self.frames = 0

    def update(self, stats):
        self.frames += 1
        for s in stats:
            self.flow[s.region].update(s.mean_flow_deg_s)
            self.depth_range[s.region].update(s.depth_range_m)
            self.fraction[s.region].update(s.fraction)

    def toDict(self):
        return {
            'frames': self.frames,
            'regions': {r: {'mean_flow_deg_s': self.flow[r].avg,
                            'flow_frames_absent': self.flow[r].skipped,
                            'depth_range_min_m': self.depth_range[r].min,
                            'depth_range_max_m': self.depth_range[r].max,
                            'mask_fraction': self.fraction[r].avg} for r in REGIONS},
        }


def _cell(x, spec='{:.4f}'):
    return '-' if x is None else spec.format(x)


def eval_results(recorder, rollup: RegionRollup, condition):
    recorder.logger.info('============ Region metrics ({}, {} frames) ============'.format(condition, rollup.frames))
    table = PrettyTable(['Region', 'Mean flow (deg/s)', 'Depth range min (m)', 'Depth range max (m)', 'Fraction'])
    for r in REGIONS:
        table.add_row([r, _cell(rollup.flow[r].avg), _cell(rollup.depth_range[r].min),
                       _cell(rollup.depth_range[r].max), _cell(rollup.fraction[r].avg)])
    recorder.logger.info(table)
