import os
import sys

import django

sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), 'siegel'))
os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'siegel.settings')
django.setup()
