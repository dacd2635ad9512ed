from django.contrib.auth import get_user_model
from django.test import TestCase

from experiment.models import ExperimentRun

User = get_user_model()


class ExperimentRunModelTests(TestCase):

    def setUp(self):
        self.user = User.objects.create_user(username="analyst", password="test1234")
        self.run = ExperimentRun.objects.create(
            kind=ExperimentRun.Kind.SWEEP,
            status="done",
            created_by=self.user,
        )

    def test_run_str(self):
        self.assertEqual(
            str(self.run),
            f"sweep #{self.run.pk}: done"
        )

    def test_runs_survive_user_deletion(self):
        self.user.delete()
        self.run.refresh_from_db()

        self.assertIsNone(self.run.created_by)

    def test_newest_runs_first(self):
        newer = ExperimentRun.objects.create(kind=ExperimentRun.Kind.VERIFY, status="pass")

        self.assertEqual(list(ExperimentRun.objects.all()), [newer, self.run])
