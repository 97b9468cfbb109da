from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='SynthesisRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('label', models.CharField(blank=True, max_length=255)),
                ('template', models.CharField(choices=[('ellipsoid', 'Ellipsoid'), ('polyset', 'Polyset'), ('piecewise', 'Piecewise semi-ellipsoid')], max_length=20)),
                ('parameters', models.JSONField(default=dict)),
                ('gamma', models.FloatField(blank=True, null=True)),
                ('status', models.CharField(choices=[('optimal', 'Optimal and verified'), ('solved-unverified', 'Solved, verification failed'), ('infeasible', 'Infeasible'), ('unbounded', 'Unbounded'), ('numerical-failure', 'Numerical failure')], max_length=20)),
                ('verified', models.BooleanField(default=False)),
                ('fingerprint', models.CharField(max_length=64)),
                ('solve_seconds', models.FloatField(default=0.0)),
                ('solution', models.JSONField(default=dict)),
                ('date_added', models.DateTimeField(auto_now_add=True)),
            ],
            options={
                'ordering': ('-date_added', '-id'),
            },
        ),
    ]
