from django.db import models


class Run(models.Model):
    created_at = models.DateTimeField(auto_now_add=True)

    command = models.CharField(max_length=32)  # mixtures/purify/singlet/chsh/...
    seed = models.CharField(max_length=20, null=True, blank=True)  # u64 nie mieści się w IntegerField

    config = models.JSONField()
    report = models.JSONField()
    passed = models.BooleanField()

    time_ms = models.IntegerField()

    class Meta:
        indexes = [models.Index(fields=["command", "passed"], name="run_command_passed_idx")]

    def __str__(self):
        status = "pass" if self.passed else "FAIL"
        return f"{self.command} seed={self.seed} {status} t={self.time_ms}ms"
