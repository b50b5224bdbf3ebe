void free(void *ptr);
struct dnode **list_dir(const char *path);
struct dnode **splitdnarray(struct dnode **dn, int nfiles);
int countdirs(struct dnode **dn, int nfiles);

static void showdirs(struct dnode **dn, int ndirs)
{
#ifdef BB_FEATURE_LS_SORTFILES
	int dndirs;
	struct dnode **dnd;
#endif
	struct dnode **subdnp;
	subdnp = list_dir(dn[0]->fullname);
#ifdef CONFIG_FEATURE_LS_RECURSIVE
	dnd = splitdnarray(subdnp, ndirs);
	dndirs = countdirs(subdnp, ndirs);
	showdirs(dnd, dndirs);
	free(dnd);
	free(subdnp);
#endif
}
