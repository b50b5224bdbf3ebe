#if defined(PNG_INTERNAL)
#define PNG_INTERLACE 0x0002
#endif
#if defined(PNG_READ_INTERLACING_SUPPORTED) || defined(PNG_WRITE_INTERLACING_SUPPORTED)
int png_set_interlace_handling(png_structp png_ptr)
{
	if (png_ptr->interlaced) {
		png_ptr->transformations |= PNG_INTERLACE;
		return 7;
	}
	return 1;
}
#endif

void png_read_image(png_structp png_ptr, png_bytepp image)
{
	int pass;
	pass = png_set_interlace_handling(png_ptr);
	image[0] = pass;
	return;
}
