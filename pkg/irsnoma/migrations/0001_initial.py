import django.db.models.deletion
import django.utils.timezone
import model_utils.fields
import uuid
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name='ExperimentRun',
            fields=[
                ('created', model_utils.fields.AutoCreatedField(default=django.utils.timezone.now, editable=False, verbose_name='created')),
                ('modified', model_utils.fields.AutoLastModifiedField(default=django.utils.timezone.now, editable=False, verbose_name='modified')),
                ('id', models.UUIDField(default=uuid.uuid4, editable=False, primary_key=True, serialize=False)),
                ('kind', models.CharField(choices=[('gain-ratio', 'Gain ratio'), ('outage-sweep', 'Outage sweep'), ('diversity-fit', 'Diversity fit'), ('bounds-table', 'Bounds table')], max_length=20)),
                ('scenario', models.CharField(choices=[('NO_DIRECT_LINK', 'Scenario I (no direct link)'), ('WITH_DIRECT_LINK', 'Scenario II (with direct link)')], max_length=20)),
                ('seed', models.BigIntegerField()),
                ('trials', models.BigIntegerField()),
                ('config_path', models.CharField(blank=True, max_length=500)),
                ('output_path', models.CharField(max_length=500)),
                ('rows_written', models.PositiveIntegerField(default=0)),
                ('notes', models.TextField(blank=True, help_text='Reason codes for blank analytic columns and skipped fits')),
                ('fits', models.TextField(blank=True)),
            ],
            options={
                'ordering': ['-created'],
            },
        ),
        migrations.CreateModel(
            name='SweepResult',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('position', models.PositiveIntegerField()),
                ('experiment', models.CharField(choices=[('gain-ratio', 'Gain ratio'), ('outage-sweep', 'Outage sweep'), ('diversity-fit', 'Diversity fit'), ('bounds-table', 'Bounds table')], max_length=20)),
                ('scenario', models.CharField(choices=[('NO_DIRECT_LINK', 'Scenario I (no direct link)'), ('WITH_DIRECT_LINK', 'Scenario II (with direct link)')], max_length=20)),
                ('scheme', models.CharField(blank=True, max_length=10)),
                ('user', models.PositiveSmallIntegerField(blank=True, null=True)),
                ('rho_db', models.FloatField(blank=True, null=True)),
                ('b', models.PositiveSmallIntegerField(blank=True, null=True)),
                ('K', models.PositiveIntegerField()),
                ('N', models.PositiveSmallIntegerField()),
                ('trials', models.BigIntegerField(blank=True, null=True)),
                ('failures', models.BigIntegerField(blank=True, null=True)),
                ('p_hat', models.FloatField(blank=True, null=True)),
                ('ci_low', models.FloatField(blank=True, null=True)),
                ('ci_high', models.FloatField(blank=True, null=True)),
                ('analytic_upper', models.FloatField(blank=True, null=True)),
                ('analytic_lower', models.FloatField(blank=True, null=True)),
                ('diversity', models.FloatField(blank=True, null=True)),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='results', to='irsnoma.experimentrun')),
            ],
            options={
                'ordering': ['run', 'position'],
                'unique_together': {('run', 'position')},
            },
        ),
    ]
