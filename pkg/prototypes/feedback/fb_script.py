"""Script to run one delayed feedback experiment and compare the two networks."""

from negperc import evaluator
from negperc.feedback import FeedbackProcessor

#######################################################################################
# Reading configuration from config.yaml
#######################################################################################
run, ann = FeedbackProcessor.from_config_yaml("fb_config.yaml")

#######################################################################################
# Gaussian network
#######################################################################################
run.run()
report = run.classify()
ann.logger.info(f"{run.config.response}: {report.kind}, waste {run.waste(excess=True):.4g}")
run.export_trajectory()

#######################################################################################
# Qubit network under the same control
#######################################################################################
run.config = run.config._replace(response="dv")
run.config = run.config._replace(chi0=run.response.upper)
run.run()
dv_report = run.classify()
ann.logger.info(f"{run.config.response}: {dv_report.kind}")
run.export_trajectory("feedback_trajectory_dv.csv")

#######################################################################################
# INSERT MANUAL STEPS HERE
# Can also add Annalist logging
#######################################################################################
# Example annalist log
# ann.logger.info("Raising kd to damp the first overshoot.")

if report.kind == evaluator.OSCILLATING:
    print(run.processing_issues[run.processing_issues["code"] == "COL"])
