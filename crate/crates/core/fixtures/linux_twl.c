#ifdef CONFIG_IRQ_DOMAIN
struct irq_domain_ops irq_domain_simple_ops;
#endif
#ifndef CONFIG_SPARC
int of_platform_populate(struct device_node *node, int t);
#endif

#ifdef CONFIG_IRQ_DOMAIN
void irq_domain_add(int irq, struct irq_domain_ops *ops)
{
	/* dereferences ops */
	irq = ops->xlate;
}
#endif
#ifdef CONFIG_TWL4030_CORE
int twl_probe(int n) {
	struct irq_domain_ops *ops = NULL;
#ifdef CONFIG_OF_IRQ
	ops = &irq_domain_simple_ops;
#endif
	int status = 0, temp = 0;
	irq_domain_add(temp, ops);
#ifdef CONFIG_OF_DEVICE
	of_platform_populate(0, 0);
#endif
	node = temp;
	status = node;
	return status;
}
#endif
