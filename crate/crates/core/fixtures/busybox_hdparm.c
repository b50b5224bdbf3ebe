void bb_error_msg_and_die(const char *msg);
void unregister_hwif(int hwif);
void scan_hwif(int a, int b, int c);

static void process_dev(char *devname)
{
	char c = devname[0];
	char *p = devname + 1;
	int hwif = 0;
#ifdef CONFIG_FEATURE_HDPARM_HDIO_UNREGISTER_HWIF
	if (c == 'U') {
		if (p == NULL)
			goto expected_hwif_error;
		unregister_hwif(hwif);
	}
#endif
#ifdef CONFIG_FEATURE_HDPARM_HDIO_SCAN_HWIF
	if (c == 'R') {
		if (p == NULL) {
 expected_hwif_error:
			bb_error_msg_and_die("expected hwif value");
		}
		scan_hwif(hwif, 0, 0);
	}
#endif
}
