'''
From Z. Zhuang et al.
https://github.com/ICEORY/PMF
'''

SCALARS = ('speed', 'coins', 'crashes', 'distance', 'shots_received', 'robots_alive')


def tensorboard_logger(tick, condition, recorder, row, region_stats=None):
    if recorder is None or recorder.tensorboard is None:
        return
    for name in SCALARS:
        recorder.tensorboard.add_scalar(
            tag='{}_{}'.format(condition, name), scalar_value=float(row[name]), global_step=tick)
    for s in region_stats or ():
        if s.mean_flow_deg_s is not None:
            recorder.tensorboard.add_scalar(
                tag='{}_flow_{}'.format(condition, s.region), scalar_value=s.mean_flow_deg_s, global_step=tick)
        if s.depth_range_m is not None:
            recorder.tensorboard.add_scalar(
                tag='{}_depth_range_{}'.format(condition, s.region), scalar_value=s.depth_range_m, global_step=tick)
