"""
WSGI entry point. Serves the admin site that browses recorded runs and
exports them to spreadsheets; simulations themselves run from ``manage.py sim``.
"""

import os

from django.core.wsgi import get_wsgi_application

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'config.settings')

application = get_wsgi_application()
