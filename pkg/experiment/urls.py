from django.urls import path, include
from rest_framework import routers

from experiment.views import ExperimentRunViewSet, LoginUserView

router = routers.DefaultRouter()
router.register("runs", ExperimentRunViewSet, basename="run")

urlpatterns = [
    path("", include(router.urls)),
    path("token/", LoginUserView.as_view(), name="token"),
]

app_name = "experiment"
