import os


class Config:
    MIN_SIZE = int(os.environ.get('RANDOMSET_MIN_SIZE') or 10)
    SIMULATIONS = int(os.environ.get('RANDOMSET_SIMULATIONS') or 10000)
    SEED = int(os.environ.get('RANDOMSET_SEED') or 0)
    ALPHA = float(os.environ.get('RANDOMSET_ALPHA') or 0.05)
    FDR = float(os.environ.get('RANDOMSET_FDR') or 0.05)
    STOREY_LAMBDA = float(os.environ.get('RANDOMSET_STOREY_LAMBDA') or 0.5)
    # Execution knobs: never echoed into outputs
    WORKERS = int(os.environ.get('RANDOMSET_WORKERS') or 1)
    LOG_LEVEL = os.environ.get('RANDOMSET_LOG_LEVEL') or 'WARNING'


class DevelopmentConfig(Config):
    LOG_LEVEL = 'DEBUG'


class ProductionConfig(Config):
    pass


class TestingConfig(Config):
    SIMULATIONS = 2000
    LOG_LEVEL = 'DEBUG'


config = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
    'default': ProductionConfig
}
