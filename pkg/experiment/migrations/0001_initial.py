# Generated by Django 5.0.6 on 2026-10-16 09:12

import django.db.models.deletion
from django.conf import settings
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
        migrations.swappable_dependency(settings.AUTH_USER_MODEL),
    ]

    operations = [
        migrations.CreateModel(
            name='ExperimentRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('kind', models.CharField(choices=[('check-params', 'Check parameters'), ('defect', 'Defect sampling'), ('approximate', 'Approximation'), ('verify', 'Verification'), ('audit', 'Constant audit'), ('sweep', 'Parameter sweep')], max_length=16)),
                ('family', models.CharField(blank=True, max_length=1)),
                ('status', models.CharField(max_length=32)),
                ('passed', models.BooleanField(blank=True, null=True)),
                ('max_violation', models.FloatField(blank=True, null=True)),
                ('runtime', models.FloatField(default=0.0)),
                ('config', models.JSONField(default=dict)),
                ('report', models.JSONField(default=dict)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('created_by', models.ForeignKey(blank=True, null=True, on_delete=django.db.models.deletion.SET_NULL, related_name='experiment_runs', to=settings.AUTH_USER_MODEL)),
            ],
            options={
                'ordering': ('-created_at', '-id'),
            },
        ),
    ]
