from django.db import models


class ExperimentRun(models.Model):
    RUNNING = 'running'
    PASSED = 'passed'
    FAILED = 'failed'
    INVALID = 'invalid'
    STATUS_CHOICES = [
        (RUNNING, 'Running'),
        (PASSED, 'Passed'),
        (FAILED, 'Failed'),
        (INVALID, 'Invalid'),
    ]

    subcommand = models.CharField(max_length=64)
    config = models.JSONField(default=dict)
    seed = models.BigIntegerField(null=True, blank=True)
    status = models.CharField(max_length=16, choices=STATUS_CHOICES, default=RUNNING)
    exit_code = models.IntegerField(null=True, blank=True)
    wall_time = models.FloatField(null=True, blank=True)
    output_dir = models.CharField(max_length=500, blank=True)
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ['-created_at', '-id']

    def __str__(self):
        return f"{self.subcommand} #{self.pk} - {self.status}"
