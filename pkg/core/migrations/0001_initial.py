# Generated by Django 4.2.16

from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='Run',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('command', models.CharField(max_length=32)),
                ('seed', models.CharField(blank=True, max_length=20, null=True)),
                ('config', models.JSONField()),
                ('report', models.JSONField()),
                ('passed', models.BooleanField()),
                ('time_ms', models.IntegerField()),
            ],
            options={
                'indexes': [models.Index(fields=['command', 'passed'], name='run_command_passed_idx')],
            },
        ),
    ]
