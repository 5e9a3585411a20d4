from .base import *

DEBUG = True

SECRET_KEY = "nfoldsusy-local-only"
