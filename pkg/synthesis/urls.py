from django.urls import path

from . import views

urlpatterns = [
    path('runs/', views.SynthesisRunList.as_view(), name='run_list'),
    path('runs/<int:pk>/', views.SynthesisRunDetail.as_view(), name='run_detail'),
]
