from django.contrib import admin
from django.urls import path

admin.site.site_header = 'IRS-NOMA outage runs'
admin.site.site_title = 'IRS-NOMA simulator'

urlpatterns = [
    path('admin/', admin.site.urls),
]
