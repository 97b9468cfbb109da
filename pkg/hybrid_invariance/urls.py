"""hybrid_invariance URL Configuration

The `urlpatterns` list routes URLs to views. For more information please see:
    https://docs.djangoproject.com/en/5.1/topics/http/urls/
"""
from django.contrib import admin
from django.urls import path, include

urlpatterns = [
    path('admin/', admin.site.urls),
    # apps urls
    path('', include('synthesis.urls')),
    # restframework urls
    path('api-auth/', include('rest_framework.urls', namespace='rest_framework')),
]
