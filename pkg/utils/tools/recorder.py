'''
Output directory and console logging for a run.

Adapted from Z. Zhuang et al.
https://github.com/ICEORY/PMF
'''

import os
import logging
import sys
import tensorboardX


class Recorder(object):
    def __init__(self, settings, save_path, use_tensorboard=False):
        self.save_path = save_path
        self.settings = settings
        self.log_path = os.path.join(self.save_path, 'log')
        os.makedirs(self.log_path, exist_ok=True)

        self.tensorboard = tensorboardX.SummaryWriter(logdir=self.save_path) if use_tensorboard else None
        self.logger = self._initLogger()
        self._saveSettings()

    def _initLogger(self):
        logger = logging.getLogger('console')
        logger.propagate = False
        # one run per process at a time: drop handlers left by a previous recorder
        for handler in list(logger.handlers):
            handler.close()
            logger.removeHandler(handler)

        file_handler = logging.FileHandler(os.path.join(self.log_path, 'console.log'))
        file_handler.setFormatter(logging.Formatter('%(asctime)s %(levelname)s: %(message)s'))
        console_handler = logging.StreamHandler(sys.stdout)
        console_handler.setFormatter(logging.Formatter('%(message)s'))
        logger.addHandler(file_handler)
        logger.addHandler(console_handler)
        logger.setLevel(logging.INFO)
        return logger

    def _saveSettings(self):
        with open(os.path.join(self.log_path, 'settings.log'), 'w') as f:
            for k, v in self.settings.__dict__.items():
                if k.startswith('_'):
                    continue
                f.write('{}: {}\n'.format(k, v))

    def close(self):
        if self.tensorboard is not None:
            self.tensorboard.close()
        for handler in list(self.logger.handlers):
            handler.close()
            self.logger.removeHandler(handler)
