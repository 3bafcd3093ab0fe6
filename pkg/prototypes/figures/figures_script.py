"""Script to write every packaged figure dataset to csv."""

from annalist.annalist import Annalist

from negperc import cli, data_acquisition, data_sources

ann = Annalist()
ann.configure(
    logfile="negperc_logs.csv",
    analyst_name="test_name",
    stream_format_str="%(function_name)s | %(message)s",
)

#######################################################################################
# Choose presets, None for all of them
#######################################################################################
chosen = ["fig1b", "figS2", "figS4", "figS6", "interdependent"]

#######################################################################################
# Build and export
#######################################################################################
for name in chosen or data_acquisition.load_presets():
    ann.logger.info(f"Building {name}")
    data_sources.frame_export_to_csv(f"{name}.csv", cli.build_dataset(name))
